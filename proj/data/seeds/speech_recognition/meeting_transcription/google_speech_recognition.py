import speech_recognition as sr

CHUNK_SECONDS = 30


def transcribe(path):
    recognizer = sr.Recognizer()
    segments = []
    with sr.AudioFile(path) as source:
        offset = 0
        while True:
            audio = recognizer.record(source, duration=CHUNK_SECONDS)
            if len(audio.frame_data) == 0:
                break
            try:
                text = recognizer.recognize_google(audio)
            except sr.UnknownValueError:
                text = ""
            segments.append((offset, text))
            offset += CHUNK_SECONDS
    return segments


if __name__ == "__main__":
    for start, text in transcribe("meeting.wav"):
        print(f"[{start:>5}s] {text}")
