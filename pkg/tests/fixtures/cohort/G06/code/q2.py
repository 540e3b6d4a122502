a = [13, 27, 38, 49]
b = [4, 55, 65, 76, 97]
print(sorted(a + b))
