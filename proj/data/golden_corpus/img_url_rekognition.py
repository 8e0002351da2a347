import requests
requests.post('https://rekognition.us-west-2.amazonaws.com', headers={'X-Amz-Target': 'RekognitionService.DetectLabels'})
