phrase = "Lorem, ipsum"
phrase.strip().replace("__", ".").upper()
".".join(phrase.split(";")).strip().lower()
phrase.strip().lower().replace(";", ".")
phrase.lower().strip().split(".")
phrase.split(";").count(".")
"__".join(phrase.strip().split(".")).lower()
out = phrase.strip().lower()
