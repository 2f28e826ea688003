def forecast(city):
    return get("https://api.weather.example/v1/" + city)
