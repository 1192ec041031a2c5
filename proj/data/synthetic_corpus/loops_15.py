result = 1
for i in range(7, 24, 3):
    result = result + i * i - 7 * i + 3
    result = result % 20 + 6 * 5
    if result > 20:
        result = result // 7 + 3 * i
result = result % 20 + 7
