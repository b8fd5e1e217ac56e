"""
Command-line surface of the moplda toolkit.
"""
