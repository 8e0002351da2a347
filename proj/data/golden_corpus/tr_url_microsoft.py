import requests
endpoint = 'https://api.cognitive.microsofttranslator.com/translate?api-version=3.0&to=de'
requests.post(endpoint, json=[{'text': 'hi'}])
