import whisper
from dragonfly import get_engine
engine = get_engine()
model = whisper.load_model('base')
