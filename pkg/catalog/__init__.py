# Bundled example inputs with known answers
