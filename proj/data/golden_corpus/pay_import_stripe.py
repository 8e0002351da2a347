import stripe
stripe.api_key = 'sk_test'
stripe.Charge.create(amount=2000, currency='usd', source='tok')
