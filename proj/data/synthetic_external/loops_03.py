result = 0
for i in range(40):
    result = result - 8 * i + i * i - 4
    result = result + 5 * 4 % 18
result = result % 18 - 8
