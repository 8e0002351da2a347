from transformers import pipeline
translator = pipeline('translation_en_to_fr')
