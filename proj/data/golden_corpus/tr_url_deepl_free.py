import requests
requests.post('https://api-free.deepl.com/v2/translate', data={'text': 'hi'})
