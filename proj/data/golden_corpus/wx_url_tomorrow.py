import requests
data = requests.get('https://api.tomorrow.io/v4/weather/forecast?location=42.3,-71.1').json()
