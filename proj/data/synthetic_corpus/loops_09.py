result = 1
for i in range(2, 40):
    result += i * i + 4 * i + 6
    result = result % 92 + 6 * 3
result = result * 2 + 4 % 92
