result = 1
for i in range(2, 50):
    result = result - i * i - 2 * i - 7
    result = result % 65 - 3 * 6
result = result * 2 - 7 % 65
