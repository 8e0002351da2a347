import azure.cognitiveservices.speech as speechsdk
config = speechsdk.SpeechConfig(subscription='k', region='r')
