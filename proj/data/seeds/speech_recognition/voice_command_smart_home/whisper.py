import whisper

COMMANDS = {"lights on": "lights", "lights off": "lights", "arm security": "security"}


def transcribe(path):
    model = whisper.load_model("base")
    result = model.transcribe(path)
    return result["text"].lower()


def act(text):
    for phrase, device in COMMANDS.items():
        if phrase in text:
            print(f"{device}: {phrase}")
            return device
    print("no command recognized")
    return None


if __name__ == "__main__":
    spoken = transcribe("command.wav")
    act(spoken)
