total = 0
for i in range(3, 50):
    total = total + 3 * i - i * i + 5
    total += 5 + total % 2
total = total % 88 + 3
