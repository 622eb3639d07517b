# kgstroll/testkit
# Oracles, generators and a stub SPARQL endpoint for the test suite.
# Oracle code works on plain strings and imports nothing else from kgstroll.
