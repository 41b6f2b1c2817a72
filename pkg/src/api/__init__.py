"""API package initialization"""
