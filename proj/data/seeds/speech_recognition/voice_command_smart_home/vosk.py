import json
import queue

import sounddevice as sd
from vosk import Model, KaldiRecognizer

SAMPLE_RATE = 16000
frames = queue.Queue()


def callback(indata, count, time_info, status):
    frames.put(bytes(indata))


def dispatch(text):
    if "lights on" in text:
        print("turning lights on")
    elif "lights off" in text:
        print("turning lights off")


def main():
    model = Model(lang="en-us")
    recognizer = KaldiRecognizer(model, SAMPLE_RATE)
    with sd.RawInputStream(samplerate=SAMPLE_RATE, blocksize=8000, dtype="int16", channels=1, callback=callback):
        while True:
            data = frames.get()
            if recognizer.AcceptWaveform(data):
                result = json.loads(recognizer.Result())
                dispatch(result.get("text", ""))


if __name__ == "__main__":
    main()
