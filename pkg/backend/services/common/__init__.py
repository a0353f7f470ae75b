# common package
