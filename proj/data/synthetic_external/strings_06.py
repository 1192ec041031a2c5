text = "red;green;;blue"
text.lower().replace("_", "-").strip()
text.lower().strip().split("-")
text.split("_").count("-")
"-".join(text.split("_")).strip().lower()
out = text.replace("**", "-").strip()
