from PIL import Image
img = Image.open('in.jpg')
img.save('out.jpg', optimize=True, quality=70)
