total = 0
for i in range(3, 18, 9):
    total = total + i * i + 3 * i + 9
    total = total % 76 + 9 * 5
total = total % 76 + 3
