# State ensembles package
