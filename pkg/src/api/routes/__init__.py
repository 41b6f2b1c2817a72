"""API routes package initialization"""
