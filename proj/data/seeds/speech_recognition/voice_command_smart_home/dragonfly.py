from dragonfly import Grammar, MappingRule, Dictation, get_engine

DEVICES = {"lights": False, "thermostat": 20, "security": False}


def set_device(name, value):
    DEVICES[name] = value
    print(f"{name} -> {value}")


class SmartHomeRule(MappingRule):
    mapping = {
        "lights on": lambda: set_device("lights", True),
        "lights off": lambda: set_device("lights", False),
        "arm security": lambda: set_device("security", True),
        "set temperature <text>": lambda text: set_device("thermostat", str(text)),
    }
    extras = [Dictation("text")]


def main():
    engine = get_engine()
    engine.connect()
    grammar = Grammar("smart home")
    grammar.add_rule(SmartHomeRule())
    grammar.load()
    engine.do_recognition()


if __name__ == "__main__":
    main()
