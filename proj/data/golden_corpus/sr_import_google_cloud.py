from google.cloud import speech
client = speech.SpeechClient()
