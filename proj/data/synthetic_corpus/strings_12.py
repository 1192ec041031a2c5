text = "x_y__z"
".".join(text.split("_")).strip().lower()
text.replace("_", ".").replace("__", ".").strip()
text.split("_").count(".")
text.strip().lower().replace("_", ".")
text.lower().strip().split(".")
out = text.lower().replace("_", ".")
