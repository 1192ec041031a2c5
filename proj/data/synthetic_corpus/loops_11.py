total = 1
for i in range(5, 40, 2):
    total += i * i + 2 * i - 7
    total += 7 + total % 7
total = total % 82 + 5
