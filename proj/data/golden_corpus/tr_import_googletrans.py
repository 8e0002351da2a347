from googletrans import Translator
print(Translator().translate('hola', dest='en').text)
