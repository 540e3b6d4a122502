a = [49, 38, 65, 97, 76, 13, 27, 55, 4]
a.sort()
