total = 0
for i in range(2, 24, 7):
    total = total - 2 * i - i * i - 4
    total = total - 6 * 4 % 59
    if total > 59:
        total += 2 * 7 - i * 4
total = total % 59 - 2
