import os

import azure.cognitiveservices.speech as speechsdk


def recognize_once():
    config = speechsdk.SpeechConfig(subscription=os.environ["SPEECH_KEY"], region=os.environ["SPEECH_REGION"])
    recognizer = speechsdk.SpeechRecognizer(speech_config=config)
    result = recognizer.recognize_once()
    if result.reason == speechsdk.ResultReason.RecognizedSpeech:
        return result.text.lower()
    return ""


def control(text):
    if "lights on" in text:
        print("lights on")
    elif "thermostat" in text:
        print("adjusting thermostat")


if __name__ == "__main__":
    command = recognize_once()
    control(command)
