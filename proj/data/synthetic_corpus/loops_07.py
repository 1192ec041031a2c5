result = 0
for i in range(40):
    result = result - 5 * i + i * i - 2
    result = result % 29 - 2 * 7
    if result % 2 == 0:
        result += 5 * 4 + i * 2
result = result * 5 + 4 % 29
