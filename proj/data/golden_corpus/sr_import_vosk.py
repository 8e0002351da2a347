import json
from vosk import Model, KaldiRecognizer
rec = KaldiRecognizer(Model('model'), 16000)
