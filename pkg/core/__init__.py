# FermiBalance – Core library package
