import requests
resp = requests.post('https://transcribe.us-east-1.amazonaws.com/', json={'TranscriptionJobName': 'job'})
