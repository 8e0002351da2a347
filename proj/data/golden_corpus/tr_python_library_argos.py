import argostranslate.translate
print(argostranslate.translate.translate('Hola', 'es', 'en'))
