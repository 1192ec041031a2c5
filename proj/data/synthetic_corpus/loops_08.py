result = 1
for i in range(5, 50):
    result = result - i * i - 5 * i - 2
    result = result % 42 - 6 * 9
    if i < 5 * 2:
        result = result - 5 * 2 - i
result = result * 5 - 2 % 42
