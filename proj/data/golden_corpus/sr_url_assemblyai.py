import requests
r = requests.post('https://api.assemblyai.com/v2/transcript', json={'audio_url': 'x'})
