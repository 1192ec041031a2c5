text = "a-b--c-d"
text.lower().strip().split("_")
text.strip().lower().replace(" ", "_")
text.lower().replace(" ", "_").strip()
text.strip().replace("  ", "_").upper()
"  ".join(text.strip().split("_")).lower()
text.upper().replace(" ", "_").strip()
out = text.replace("  ", "_").strip()
