import speech_recognition as sr

DEVICES = {"lights": False, "thermostat": 20, "security": False}


def handle(command):
    command = command.lower()
    if "lights on" in command:
        DEVICES["lights"] = True
    elif "lights off" in command:
        DEVICES["lights"] = False
    elif "arm security" in command:
        DEVICES["security"] = True
    print(DEVICES)


def listen_forever():
    recognizer = sr.Recognizer()
    microphone = sr.Microphone()
    with microphone as source:
        recognizer.adjust_for_ambient_noise(source)
    while True:
        with microphone as source:
            audio = recognizer.listen(source)
        try:
            text = recognizer.recognize_google(audio)
            handle(text)
        except sr.UnknownValueError:
            print("could not understand audio")


if __name__ == "__main__":
    listen_forever()
