from elevenlabs import generate, play
play(generate(text='Hi'))
