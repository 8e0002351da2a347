from ibm_watson import SpeechToTextV1
from ibm_cloud_sdk_core.authenticators import IAMAuthenticator
stt = SpeechToTextV1(authenticator=IAMAuthenticator('key'))
