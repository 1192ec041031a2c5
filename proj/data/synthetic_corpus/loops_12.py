result = 0
for i in range(2, 18, 2):
    result = result + 2 * i - i * i + 6
    result += 6 + result % 4
result = result % 29 + 2
