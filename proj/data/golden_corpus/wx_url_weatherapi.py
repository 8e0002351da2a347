import requests
print(requests.get('http://api.weatherapi.com/v1/forecast.json?q=London&days=3').json())
