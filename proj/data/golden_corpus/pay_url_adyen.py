import requests
requests.post('https://checkout-test.adyen.com/v71/payments', json={'amount': {'value': 1000}})
