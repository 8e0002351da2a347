import requests
# Transcribe the recording with Deepgram
host = 'api.' + 'dg' + '.example'
