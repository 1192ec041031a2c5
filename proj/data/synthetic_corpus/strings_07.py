text = "red;green;;blue"
text.replace(" ", ".").replace("**", ".").strip()
text.replace("**", ".").strip().lower()
text.strip().replace("**", ".").upper()
text.lower().replace(" ", ".").strip()
text.split(" ").count(".")
out = text.strip().lower()
