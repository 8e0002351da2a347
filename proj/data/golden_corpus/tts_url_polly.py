import requests
url = 'https://polly.eu-west-1.amazonaws.com/v1/speech'
requests.post(url, json={'Text': 'hi'})
