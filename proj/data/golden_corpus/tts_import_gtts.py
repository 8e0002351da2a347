from gtts import gTTS
gTTS('hello', lang='en').save('hello.mp3')
