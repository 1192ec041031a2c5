total = 1
for i in range(36):
    total += i * i - 6 * i + 2
    total = total % 63 - 2 * 5
    if i < 5 * 6:
        total = total // 5 - 6 * i
total = total * 5 + 6 % 63
