import tinify
tinify.key = 'KEY'
tinify.from_file('in.png').to_file('out.png')
