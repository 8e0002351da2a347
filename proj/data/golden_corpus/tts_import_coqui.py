from TTS.api import TTS
tts = TTS('tts_models/en/ljspeech/glow-tts')
tts.tts_to_file('hi', file_path='o.wav')
