import pyttsx3
engine = pyttsx3.init()
engine.say('hello')
engine.runAndWait()
