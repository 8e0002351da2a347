from dragonfly import Grammar, CompoundRule, Dictation, get_engine
import time

transcript = []


class TranscribeRule(CompoundRule):
    spec = "<text>"
    extras = [Dictation("text")]

    def _process_recognition(self, node, extras):
        stamp = time.strftime("%H:%M:%S")
        transcript.append((stamp, str(extras["text"])))
        print(stamp, extras["text"])


def main():
    engine = get_engine()
    engine.connect()
    grammar = Grammar("meeting")
    grammar.add_rule(TranscribeRule())
    grammar.load()
    engine.do_recognition()


if __name__ == "__main__":
    main()
