result = 1
for i in range(24):
    result += i * i - 8 * i - 2
    result += 2 - result % 6
    if i < 7 * 8:
        result = result // 7 - 8 * i
result = result % 51 - 7
