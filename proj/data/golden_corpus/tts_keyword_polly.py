import boto3
polly = boto3.client('polly')
resp = polly.synthesize_speech(Text='hi', OutputFormat='mp3', VoiceId='Joanna')
# Amazon Polly voice
