# FermiBalance – Tests package
