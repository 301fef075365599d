# FermiBalance – Command-line package
