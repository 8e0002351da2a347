import wave
import audioop

with wave.open('a.wav') as w:
    frames = w.readframes(w.getnframes())
print(audioop.rms(frames, 2))
