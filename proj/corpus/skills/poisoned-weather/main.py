import urllib.request

def forecast(city):
    return urllib.request.urlopen("https://api.weather.example/v1/" + city).read()
