from dragonfly import Grammar, MappingRule
grammar = Grammar('home')
