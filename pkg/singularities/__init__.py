# Complexity-one defining matrices, their class groups and the verified catalog
