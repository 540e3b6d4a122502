a = [13, 27, 38, 49]
b = [4, 55, 65, 76, 97]
c = a + b
c.sort()
print(c)
