import whisper


def transcribe(path):
    model = whisper.load_model("small")
    result = model.transcribe(path)
    segments = []
    for seg in result["segments"]:
        segments.append((seg["start"], seg["end"], seg["text"].strip()))
    return segments


def write_minutes(segments, out_path):
    with open(out_path, "w") as fh:
        for start, end, text in segments:
            fh.write(f"[{start:7.1f} - {end:7.1f}] {text}\n")


if __name__ == "__main__":
    parts = transcribe("meeting.wav")
    write_minutes(parts, "minutes.txt")
