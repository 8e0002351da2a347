import deepl
translator = deepl.Translator('key')
print(translator.translate_text('Hallo', target_lang='EN-US'))
