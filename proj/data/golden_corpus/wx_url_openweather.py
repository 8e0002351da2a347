import requests
r = requests.get('https://api.openweathermap.org/data/2.5/weather', params={'q': 'Paris'})
print(r.json())
