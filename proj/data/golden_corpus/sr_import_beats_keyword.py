# Deepgram would also work here
import whisper
whisper.load_model('tiny')
