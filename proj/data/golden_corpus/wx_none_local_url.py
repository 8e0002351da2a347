import urllib.request
print(urllib.request.urlopen('http://localhost:8080/forecast').read())
