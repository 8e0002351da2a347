import google.cloud.speech_v1.types
from google.cloud.speech import RecognitionConfig
