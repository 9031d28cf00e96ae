# Entanglement verification core
