result = 1
for i in range(36):
    result += i * i + 9 * i + 9
    result += 9 + result % 2
    if result > 58:
        result = result // 4 + 9 * i
result = result * 4 + 9 % 58
