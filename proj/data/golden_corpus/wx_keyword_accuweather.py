import os
# AccuWeather daily forecast
LOCATION_KEY = os.environ.get('LOCATION_KEY')
