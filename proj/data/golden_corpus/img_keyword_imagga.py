def tag(path):
    # Tag objects through the Imagga tagging endpoint
    return path
