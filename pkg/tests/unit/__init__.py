"""unit tests package"""
