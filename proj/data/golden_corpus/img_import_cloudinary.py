import cloudinary.uploader
cloudinary.uploader.upload('a.jpg', quality='auto')
